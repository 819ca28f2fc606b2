#include <iostream>
#include <string>
#include <vector>

#include "ofesi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ofesi::cli::run(args, std::cin, std::cout, std::cerr);
}
