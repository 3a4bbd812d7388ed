#include <iostream>

#include "descriptor_minimax/cli_io.hpp"

int main(int argc, char** argv) { return dminimax::run_cli(argc, argv, std::cout, std::cerr); }
