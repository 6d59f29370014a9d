#include <iostream>

#include "compstat/cli.hpp"

int main(int argc, char** argv) {
  return compstat::cli::run(argc, argv, std::cout, std::cerr);
}
