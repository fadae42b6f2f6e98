#include <doctest.h>

#include "hitgnn/sparse.hpp"
#include "hitgnn/tracks.hpp"
#include "support.hpp"

using namespace hitgnn;
using namespace hitgnn::testing;

TEST_CASE("coo_to_csr identity and empty") {
    CooMatrix eye{2, 2, {{0, 0, 1.0}, {1, 1, 1.0}}};
    const CsrMatrix csr = coo_to_csr(eye);
    CHECK(csr.row_ptr == std::vector<Index>{0, 1, 2});
    CHECK(csr.col_idx == std::vector<Index>{0, 1});

    CooMatrix empty{3, 3, {}};
    const CsrMatrix csr_empty = coo_to_csr(empty);
    CHECK(csr_empty.row_ptr == std::vector<Index>{0, 0, 0, 0});
    CHECK(csr_empty.nnz() == 0);
}

TEST_CASE("coo_to_csr random matches dense reconstruction and round trips") {
    Rng rng(42);
    const CooMatrix coo = random_coo(8, 8, 12, rng);
    const CsrMatrix csr = coo_to_csr(coo);
    CHECK(max_abs_diff(densify(coo), densify(csr)) == 0.0);

    const CsrMatrix round = coo_to_csr(csr_to_coo(csr));
    CHECK(round == csr);
}

TEST_CASE("coo_to_csr rejects duplicates and unsorted input") {
    CooMatrix dups{2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}};
    CHECK_THROWS_AS(coo_to_csr(dups), std::invalid_argument);
    CooMatrix unsorted{2, 2, {{1, 0, 1.0}, {0, 0, 2.0}}};
    CHECK_THROWS_AS(coo_to_csr(unsorted), std::invalid_argument);
}

TEST_CASE("canonicalize sums duplicates and drops zeros") {
    CooMatrix m{2, 2, {{1, 1, 2.0}, {0, 0, 1.5}, {1, 1, -2.0}, {0, 1, 0.5}}};
    m.canonicalize();
    CHECK(m.entries == std::vector<CooEntry>{{0, 0, 1.5}, {0, 1, 0.5}});
    CHECK(m.is_canonical());
}

TEST_CASE("spgemm identity") {
    Rng rng(7);
    const CsrMatrix a = coo_to_csr(random_coo(5, 4, 9, rng));
    CooMatrix eye{5, 5, {}};
    for (Index i = 0; i < 5; ++i) eye.entries.push_back({i, i, 1.0});
    const CsrMatrix product = spgemm(coo_to_csr(eye), a);
    CHECK(product == a);
}

TEST_CASE("spgemm known 4x4 product matches dense oracle") {
    Rng rng(11);
    const CooMatrix a_coo = random_coo(4, 4, 7, rng);
    const CooMatrix b_coo = random_coo(4, 4, 6, rng);
    const CsrMatrix c = spgemm(coo_to_csr(a_coo), coo_to_csr(b_coo));
    const DenseMatrix expected = dense_matmul(densify(a_coo), densify(b_coo));
    CHECK(max_abs_diff(densify(c), expected) < 1e-14);
}

TEST_CASE("spgemm with a selection matrix gathers rows") {
    Rng rng(13);
    const CsrMatrix a = coo_to_csr(random_coo(6, 5, 14, rng));
    const std::vector<Index> pick{4, 1, 1, 5};
    const CsrMatrix s = selection_matrix(pick, 6);
    const CsrMatrix gathered = spgemm(s, a);
    const DenseMatrix dense_a = densify(a);
    const DenseMatrix dense_g = densify(gathered);
    for (std::size_t i = 0; i < pick.size(); ++i)
        for (Index j = 0; j < 5; ++j)
            CHECK(dense_g.at(static_cast<Index>(i), j) == dense_a.at(pick[i], j));
}

TEST_CASE("spgemm rejects dimension mismatch") {
    const CsrMatrix a(3, 4);
    const CsrMatrix b(5, 3);
    CHECK_THROWS_AS(spgemm(a, b), std::invalid_argument);
}

TEST_CASE("spgemm drops zeros produced by cancellation") {
    // [1 1] * [ 1] = [0]
    CooMatrix a{1, 2, {{0, 0, 1.0}, {0, 1, 1.0}}};
    CooMatrix b{2, 1, {{0, 0, 1.0}, {1, 0, -1.0}}};
    const CsrMatrix c = spgemm(coo_to_csr(a), coo_to_csr(b));
    CHECK(c.nnz() == 0);
}

TEST_CASE("spgemm associativity on random triples") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const CsrMatrix a = coo_to_csr(random_coo(6, 5, 10, rng));
        const CsrMatrix b = coo_to_csr(random_coo(5, 7, 12, rng));
        const CsrMatrix c = coo_to_csr(random_coo(7, 4, 9, rng));
        const CsrMatrix left = spgemm(spgemm(a, b), c);
        const CsrMatrix right = spgemm(a, spgemm(b, c));
        CHECK(max_abs_diff(densify(left), densify(right)) < 1e-10);
    }
}

TEST_CASE("induced_subgraph full selection is identity") {
    const CsrMatrix a = random_graph(7, 20, 5);
    std::vector<Index> all(7);
    for (Index i = 0; i < 7; ++i) all[static_cast<std::size_t>(i)] = i;
    const auto [sub, map] = induced_subgraph(a, all);
    CHECK(sub == a);
    CHECK(map == all);
}

TEST_CASE("induced_subgraph singleton without self-loop is empty") {
    const CsrMatrix a = path_graph(4);
    const auto [sub, map] = induced_subgraph(a, std::vector<Index>{2});
    CHECK(sub.n_rows == 1);
    CHECK(sub.nnz() == 0);
    CHECK(map == std::vector<Index>{2});
}

TEST_CASE("induced_subgraph matches brute-force edge scan") {
    const CsrMatrix a = random_graph(10, 30, 23);
    const std::vector<Index> verts{7, 2, 9, 4};
    const auto [sub, map] = induced_subgraph(a, verts);

    const CooMatrix full = csr_to_coo(a);
    std::vector<CooEntry> expected;
    for (const auto& e : full.entries) {
        Index li = -1, lj = -1;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            if (verts[i] == e.row) li = static_cast<Index>(i);
            if (verts[i] == e.col) lj = static_cast<Index>(i);
        }
        if (li >= 0 && lj >= 0) expected.push_back({li, lj, e.value});
    }
    CooMatrix expected_coo{4, 4, expected};
    expected_coo.canonicalize();
    CHECK(csr_to_coo(sub).entries == expected_coo.entries);
}

TEST_CASE("induced_subgraph nnz equals brute-force count on random pairs") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 4 + static_cast<Index>(rng.bounded(17));  // up to 20
        const CsrMatrix a = random_graph(n, 3 * n, rng.next_u64());
        const Index subset_size = 1 + static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n)));
        std::vector<Index> perm(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        for (Index i = n - 1; i > 0; --i) {
            const auto j = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        perm.resize(static_cast<std::size_t>(subset_size));

        const auto [sub, map] = induced_subgraph(a, perm);
        Index expected = 0;
        for (const auto& e : csr_to_coo(a).entries) {
            bool has_u = false, has_v = false;
            for (Index v : perm) {
                has_u = has_u || v == e.row;
                has_v = has_v || v == e.col;
            }
            if (has_u && has_v) ++expected;
        }
        CHECK(sub.nnz() == expected);
    }
}

TEST_CASE("induced_subgraph rejects bad vertex lists") {
    const CsrMatrix a = path_graph(4);
    CHECK_THROWS_AS(induced_subgraph(a, std::vector<Index>{0, 4}), std::invalid_argument);
    CHECK_THROWS_AS(induced_subgraph(a, std::vector<Index>{1, 1}), std::invalid_argument);
}

TEST_CASE("row_normalize basics") {
    CooMatrix m{1, 2, {{0, 0, 2.0}, {0, 1, 2.0}}};
    const CsrMatrix normalized = row_normalize(coo_to_csr(m));
    CHECK(normalized.values == std::vector<double>{0.5, 0.5});

    CooMatrix ones{1, 5, {}};
    for (Index i = 0; i < 5; ++i) ones.entries.push_back({0, i, 1.0});
    const CsrMatrix uniform = row_normalize(coo_to_csr(ones));
    for (double v : uniform.values) CHECK(v == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("row_normalize random rows sum to one, empty rows stay empty") {
    Rng rng(37);
    CooMatrix m = random_coo(6, 6, 14, rng);
    for (auto& e : m.entries) e.value = std::abs(e.value);
    m.canonicalize();
    const CsrMatrix a = coo_to_csr(m);
    const CsrMatrix normalized = row_normalize(a);
    for (Index r = 0; r < 6; ++r) {
        if (normalized.row_nnz(r) == 0) {
            CHECK(a.row_nnz(r) == 0);
            continue;
        }
        double sum = 0.0;
        for (double v : normalized.row_values(r)) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("row_normalize is idempotent and rejects negatives") {
    Rng rng(39);
    CooMatrix m = random_coo(5, 5, 12, rng);
    for (auto& e : m.entries) e.value = std::abs(e.value);
    m.canonicalize();
    const CsrMatrix once = row_normalize(coo_to_csr(m));
    const CsrMatrix twice = row_normalize(once);
    for (std::size_t i = 0; i < once.values.size(); ++i)
        CHECK(std::abs(once.values[i] - twice.values[i]) < 1e-12);

    CooMatrix negative{1, 1, {{0, 0, -1.0}}};
    CHECK_THROWS_AS(row_normalize(coo_to_csr(negative)), std::invalid_argument);
}

TEST_CASE("vstack single input and one-hot rows") {
    Rng rng(41);
    const CsrMatrix a = coo_to_csr(random_coo(3, 4, 6, rng));
    const CsrMatrix stacked = vstack(std::vector<CsrMatrix>{a});
    CHECK(stacked == a);

    const CsrMatrix r0 = selection_matrix(std::vector<Index>{2}, 5);
    const CsrMatrix r1 = selection_matrix(std::vector<Index>{4}, 5);
    const CsrMatrix q = vstack(std::vector<CsrMatrix>{r0, r1});
    CHECK(q.n_rows == 2);
    CHECK(q.col_idx == std::vector<Index>{2, 4});
}

TEST_CASE("vstack equals dense vertical concatenation and slices back") {
    Rng rng(43);
    const std::vector<CsrMatrix> ms{coo_to_csr(random_coo(2, 5, 4, rng)),
                                    coo_to_csr(random_coo(4, 5, 9, rng)),
                                    coo_to_csr(random_coo(3, 5, 5, rng))};
    const CsrMatrix stacked = vstack(ms);
    const DenseMatrix dense = densify(stacked);
    Index row = 0;
    for (const auto& m : ms) {
        const DenseMatrix part = densify(m);
        for (Index i = 0; i < m.n_rows; ++i)
            for (Index j = 0; j < 5; ++j) CHECK(dense.at(row + i, j) == part.at(i, j));
        const CsrMatrix slice = csr_row_slice(stacked, row, row + m.n_rows);
        CHECK(slice == m);
        row += m.n_rows;
    }
}

TEST_CASE("vstack rejects column mismatch") {
    CHECK_THROWS_AS(vstack(std::vector<CsrMatrix>{CsrMatrix(2, 3), CsrMatrix(2, 4)}),
                    std::invalid_argument);
}

TEST_CASE("block_diag single component and two edges") {
    CooMatrix one{3, 3, {{0, 1, 1.0}, {2, 0, 1.0}}};
    const auto [single, offsets_single] = block_diag(std::vector<CooMatrix>{one});
    CHECK(densify(single).data == densify(one).data);
    CHECK(offsets_single == std::vector<Index>{0, 3});

    CooMatrix edge{2, 2, {{0, 1, 1.0}}};
    const auto [pair, offsets_pair] = block_diag(std::vector<CooMatrix>{edge, edge});
    CHECK(pair.n_rows == 4);
    CHECK(pair.entries == std::vector<CooEntry>{{0, 1, 1.0}, {2, 3, 1.0}});
    CHECK(offsets_pair == std::vector<Index>{0, 2, 4});
}

TEST_CASE("block_diag of five random components keeps them disconnected") {
    Rng rng(47);
    std::vector<CooMatrix> parts;
    Index expected_components = 0;
    for (int i = 0; i < 5; ++i) {
        const Index n = 2 + static_cast<Index>(rng.bounded(4));
        CooMatrix part = csr_to_coo(random_graph(n, 2 * n, rng.next_u64()));
        const std::vector<std::uint8_t> all_mask(part.entries.size(), 1);
        const TrackSet cc = connected_components(part, all_mask, 1);
        expected_components += static_cast<Index>(cc.tracks.size());
        parts.push_back(std::move(part));
    }
    const auto [combined, offsets] = block_diag(parts);
    const std::vector<std::uint8_t> mask(combined.entries.size(), 1);
    const TrackSet cc = connected_components(combined, mask, 1);
    CHECK(static_cast<Index>(cc.tracks.size()) == expected_components);
    CHECK(offsets.size() == 6);
}

TEST_CASE("transpose and symmetrize_pattern") {
    const CsrMatrix a = random_graph(6, 12, 53);
    const CsrMatrix att = transpose(transpose(a));
    CHECK(att == a);

    const CsrMatrix sym = symmetrize_pattern(a);
    const DenseMatrix d = densify(sym);
    const DenseMatrix da = densify(a);
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) {
            const bool expected = da.at(i, j) != 0.0 || da.at(j, i) != 0.0;
            CHECK((d.at(i, j) != 0.0) == expected);
            if (expected) CHECK(d.at(i, j) == 1.0);
        }
}
