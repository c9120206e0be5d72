#include <iostream>

#include "scolab/cli.hpp"

int main(int argc, char** argv) { return scolab::run_cli(argc, argv, std::cout, std::cerr); }
