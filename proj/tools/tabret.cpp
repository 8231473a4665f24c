#include <iostream>

#include "tabret/cli.hpp"

int main(int argc, char** argv) { return tabret::run_cli(argc, argv, std::cout, std::cerr); }
