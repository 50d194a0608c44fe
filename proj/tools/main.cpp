#include "cli.hpp"

int main(int argc, char** argv) { return scca::cli::run_cli(argc, argv); }
