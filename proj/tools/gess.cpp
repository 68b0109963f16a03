#include "gess/cli.hpp"

int main(int argc, char** argv) { return gess::cli::run(argc, argv); }
