#include "ebpred/cli.hpp"

int main(int argc, char** argv) { return ebpred::cli::cli_dispatch(argc, argv); }
