#include "stablab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stablab::run_cli(argc, argv, std::cout, std::cerr); }
