#include <iostream>

#include "geoqr/cli.hpp"

int main(int argc, char** argv) { return geoqr::cli::run(argc, argv, std::cout, std::cerr); }
