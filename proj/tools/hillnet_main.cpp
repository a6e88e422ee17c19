#include "hillnet/cli.hpp"

int main(int argc, char** argv) { return hillnet::cli::run(argc, argv); }
