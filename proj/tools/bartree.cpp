#include <iostream>

#include "bartree/cli.hpp"

int main(int argc, char** argv) { return bartree::run_cli(argc, argv, std::cout, std::cerr); }
