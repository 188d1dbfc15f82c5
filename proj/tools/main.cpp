#include "mixstdf/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mixstdf::run_cli(argc, argv, std::cout, std::cerr); }
