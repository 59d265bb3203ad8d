#include "msfwi/cli.hpp"

int main(int argc, char** argv) { return msfwi::cli_main(argc, argv); }
