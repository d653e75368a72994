#include <iostream>

#include "sqdf/cli.hpp"

int main(int argc, char** argv) { return sqdf::run_cli(argc, argv, std::cout, std::cerr); }
