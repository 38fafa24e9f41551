#include <iostream>

#include "cbo/cli.hpp"

int main(int argc, char** argv) {
  return cbo::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
