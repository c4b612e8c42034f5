#include <string>
#include <vector>

#include "potts/cli.hpp"

int main(int argc, char** argv) {
  return potts::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
