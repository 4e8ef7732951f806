#include <iostream>

#include "facialpulse/cli/app.hpp"

int main(int argc, char** argv) {
  return facialpulse::cli::run(argc, argv, std::cout, std::cerr);
}
