// Copyright (c) 2026 The sideaware Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
  return sideaware::cli::run_cli(argc, argv, std::cout, std::cerr);
}
