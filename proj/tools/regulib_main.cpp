#include "regulib/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return regulib::cli::run(argc, argv, std::cout, std::cerr);
}
