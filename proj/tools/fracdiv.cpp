#include "fracdiv/cli.hpp"

int main(int argc, char** argv) { return fracdiv::cli::run(argc, argv); }
