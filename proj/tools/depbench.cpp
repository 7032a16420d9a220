#include "depbench/cli.hpp"

int main(int argc, char** argv) { return depbench::cli::run_main(argc, argv); }
