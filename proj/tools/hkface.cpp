#include <iostream>
#include <string>
#include <vector>

#include "hk/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hk::runCli(args, std::cout, std::cerr);
}
