#include <iostream>
#include <string>
#include <vector>

#include "renass/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return renass::cli::run(args, std::cout, std::cerr);
}
