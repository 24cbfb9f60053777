#include <stdio.h>
#include <string.h>
#include "eoqa.h"

int main(int argc, char **argv) {
    EoqaEngine *engine = NULL;
    if (argc < 3) return 10;
    if (eoqa_engine_load(argv[1], NULL, &engine) != EOQA_STATUS_OK) return 11;
    if (eoqa_engine_triple_count(engine) == 0) return 12;

    char *json = NULL;
    EoqaStatus s = eoqa_ask(engine, argv[2], EOQA_EXECUTE, &json);
    if (s != EOQA_STATUS_OK || json == NULL) return 13;
    if (strstr(json, "\"answers\"") == NULL) return 14;
    puts(json);
    eoqa_string_free(json);

    s = eoqa_ask(engine, "", 0, &json);
    if (s != EOQA_STATUS_EMPTY_QUESTION) return 15;
    if (strcmp(eoqa_status_message(s), "question is empty") != 0) return 16;
    eoqa_string_free(json);

    eoqa_engine_free(engine);
    return 0;
}
