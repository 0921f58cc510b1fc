#include <iostream>

#include "cle/cli_io.hpp"

int main(int argc, char** argv) { return cle::cli::run_cli(argc, argv, std::cout, std::cerr); }
