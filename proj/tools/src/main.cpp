#include <iostream>

#include "vrcp_cli/cli.hpp"

int main(int argc, char** argv) { return vrcp::cli::run(argc, argv, std::cout, std::cerr); }
