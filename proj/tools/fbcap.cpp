#include <iostream>

#include "fbcap/cli.hpp"

int main(int argc, char** argv) { return fbcap::cli::run(argc, argv, std::cout, std::cerr); }
