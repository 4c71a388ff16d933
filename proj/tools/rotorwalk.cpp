#include <iostream>

#include "rotor/cli.hpp"

int main(int argc, char** argv) { return rotor::cli::run(argc, argv, std::cout, std::cerr); }
