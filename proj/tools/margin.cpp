#include <iostream>
#include <string>
#include <vector>

#include "margin/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return margin::cli::run(args, std::cout, std::cerr);
}
