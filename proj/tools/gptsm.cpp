#include <iostream>

#include "gptsm/cli.hpp"

int main(int argc, char** argv) {
  return gptsm::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
