#include "stickel/cli.hpp"

int main(int argc, char** argv) { return stickel::cli::run(argc, argv); }
