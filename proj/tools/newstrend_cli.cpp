#include <string>
#include <vector>

#include "newstrend/cli/commands.hpp"

int main(int argc, char** argv) {
  return newstrend::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
