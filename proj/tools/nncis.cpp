#include "nncis/cli.hpp"

int main(int argc, char** argv) { return nncis::cli::dispatch(argc, argv); }
