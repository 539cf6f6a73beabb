#include "cli_commands.hpp"

int main(int argc, char** argv) { return tagspot::cli::run(argc, argv); }
