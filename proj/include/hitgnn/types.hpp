#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hitgnn {

using Index = std::int64_t;

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw std::invalid_argument(msg);
}

[[noreturn]] inline void fail_state(const std::string& msg) {
    throw std::runtime_error(msg);
}

}  // namespace hitgnn
