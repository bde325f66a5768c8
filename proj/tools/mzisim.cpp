#include <iostream>
#include <string>
#include <vector>

#include "mzisim/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mzisim::run_cli(args, std::cout, std::cerr);
}
