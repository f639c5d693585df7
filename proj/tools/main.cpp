#include "rnng/cli/commands.hpp"

int main(int argc, char** argv) { return rnng::cli::run(argc, argv); }
