#include "cli.hpp"

int main(int argc, char** argv) { return lazyrelu::cli::run_cli(argc, argv); }
