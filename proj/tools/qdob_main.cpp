#include "qdob/cli_runner.hpp"

int main(int argc, char** argv) { return qdob::cli::run_main(argc, argv); }
