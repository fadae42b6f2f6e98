#include "hitgnn/cli.hpp"

int main(int argc, char** argv) { return hitgnn::cli::run(argc, argv); }
