#include <iostream>

#include "icegrid/cli.hpp"

int main(int argc, char** argv) { return icegrid::cli::dispatch(argc, argv, std::cout, std::cerr); }
