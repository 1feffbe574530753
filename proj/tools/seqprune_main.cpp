#include <string>
#include <vector>

#include "seqprune/cli.hpp"

int main(int argc, char** argv) {
  return seqprune::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
