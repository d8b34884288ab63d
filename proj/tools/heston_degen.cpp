#include <iostream>

#include "heston/commands.hpp"

int main(int argc, char** argv) { return heston::run_cli(argc, argv, std::cout, std::cerr); }
