#include <iostream>
#include <vector>

#include "apifuzz/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return apifuzz::cli_run(std::move(args), std::cout, std::cerr);
}
