#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ddlyap::cli::run(argc, argv, std::cout, std::cerr); }
