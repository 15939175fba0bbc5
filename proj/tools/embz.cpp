#include "embz/cli.hpp"

int main(int argc, char** argv) { return embz::cli::run_cli(argc, argv); }
