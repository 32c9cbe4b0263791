#include <iostream>

#include "mwe/cli.h"

int main(int argc, char** argv) { return mwe::run(argc, argv, std::cout, std::cerr); }
