#include <iostream>

#include "clawguard/cli.hpp"

int main(int argc, char** argv) {
  return clawguard::cli::run(argc, argv, std::cout, std::cerr);
}
