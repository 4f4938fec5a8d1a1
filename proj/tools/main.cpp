#include "ringloc_cli/commands.hpp"

int main(int argc, char** argv) { return ringloc::cli::run(argc, argv); }
