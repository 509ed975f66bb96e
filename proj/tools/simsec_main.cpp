#include <iostream>

#include "simsec/harness/cli.hpp"

int main(int argc, char** argv) { return simsec::harness::cli_main(argc, argv, std::cout, std::cerr); }
