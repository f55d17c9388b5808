#include "cli.hpp"

int main(int argc, char** argv) { return sliceq::cli::run_cli(argc, argv); }
