#include <string>
#include <vector>

#include "doc2doc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return doc2doc::cli::dispatch(args);
}
