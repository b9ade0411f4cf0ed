#include "cosmichist/pipeline.hpp"

#include <iostream>

int main(int argc, char** argv) { return cosmichist::run_cli(argc, argv, std::cout, std::cerr); }
