#include "dialkit/cli.hpp"

int main(int argc, char** argv) { return dialkit::cli::dispatch(argc, argv); }
