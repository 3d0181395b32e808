#include "dichotomy_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dichotomy::cli::run(argc, argv, std::cout, std::cerr); }
