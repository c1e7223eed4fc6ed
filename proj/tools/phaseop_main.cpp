#include <iostream>

#include "phaseop/cli.hpp"

int main(int argc, char** argv) { return phaseop::run_cli(argc, argv, std::cout, std::cerr); }
