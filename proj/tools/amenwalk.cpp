#include <iostream>

#include "amenwalk/cli.hpp"

int main(int argc, char** argv) {
  return amenwalk::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
