#include "pmod/cli.hpp"

int main(int argc, char** argv)
{
    return pmod::cli::main(argc, argv);
}
