#include <iostream>

#include "motrack/cli.hpp"

int main(int argc, char** argv) { return motrack::cli::run(argc, argv, std::cout, std::cerr); }
