#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qgraph::cli::run_cli(argc, argv, std::cout, std::cerr); }
