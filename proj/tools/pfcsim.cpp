/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/io/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return pfc::io::run_cli(argc, argv, std::cout, std::cerr);
}
