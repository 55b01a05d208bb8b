#include "cli.hpp"

int main(int argc, char** argv) { return trustdyn::cli::run(argc, argv); }
