#include <iostream>

#include "crownkit/cli.hpp"

int main(int argc, char** argv) { return crownkit::cli::run(argc, argv, std::cout, std::cerr); }
