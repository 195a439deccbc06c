#include <iostream>

#include "qdob/suite.hpp"

int main(int argc, char** argv) {
  std::string filter = argc > 1 ? argv[1] : "";
  auto results = qdob::run_paper_suite(filter);
  int failures = qdob::print_suite_results(results, std::cout);
  return failures == 0 ? 0 : 1;
}
