#include <iostream>

#include "mhtest/cli.hpp"

int main(int argc, char** argv) { return mhtest::run_cli(argc, argv, std::cout, std::cerr); }
