#include "labyrinth/cli.hpp"

int main(int argc, char** argv) { return lab::cli::main(argc, argv); }
