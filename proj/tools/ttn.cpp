#include <iostream>

#include "ttn/cli.hpp"

int main(int argc, char** argv) { return ttn::run_cli(argc, argv, std::cout, std::cerr); }
