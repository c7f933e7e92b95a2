#include <iostream>
#include <string>
#include <vector>

#include "mgcp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mgcp::cli::run(args, std::cout, std::cerr);
}
