#include "bodysep/cli.hpp"

int main(int argc, char** argv) { return bodysep::cli::run(argc, argv); }
