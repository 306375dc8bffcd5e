#include "htr/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return htr::run(argc, argv, std::cout, std::cerr); }
