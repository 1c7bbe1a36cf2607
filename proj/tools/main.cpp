#include <iostream>

#include "elmo/cli.hpp"

int main(int argc, char** argv) { return elmo::cli::run(argc, argv, std::cout, std::cerr); }
