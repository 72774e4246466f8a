#include <iostream>

#include "balmse/cli.hpp"

int main(int argc, char** argv) { return balmse::run_cli(argc, argv, std::cout, std::cerr); }
