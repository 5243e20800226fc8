#include <iostream>

#include "clockreg/cli.hpp"

int main(int argc, char** argv) { return clockreg::cli::run(argc, argv, std::cout, std::cerr); }
