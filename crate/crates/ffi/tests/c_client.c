#include <stdio.h>
#include <string.h>
#include "hcoseg.h"

int main(void) {
    uint64_t calls = 0;
    if (hc_coseg_call_count(8, 2, &calls) != HC_STATUS_OK || calls != 8) return 1;

    HcSequence *seq = hc_sequence_new(16, 16);
    uint8_t rgb[16 * 16 * 3];
    for (int t = 0; t < 2; ++t) {
        for (int i = 0; i < 256; ++i) {
            int fg = (i % 16) >= 4 + t && (i % 16) < 10 + t && i / 16 >= 4 && i / 16 < 10;
            rgb[3 * i] = fg ? 250 : 75;
            rgb[3 * i + 1] = fg ? 222 : 96;
            rgb[3 * i + 2] = fg ? 48 : 53;
        }
        if (hc_sequence_push_rgb(seq, rgb, sizeof rgb) != HC_STATUS_OK) return 2;
    }
    HcConfig *cfg = hc_config_new();
    if (hc_config_set(cfg, "bogus", "1") != HC_STATUS_CONFIG) return 3;
    if (hc_last_error() == NULL || strstr(hc_last_error(), "bogus") == NULL) return 4;

    HcResult *res = NULL;
    if (hc_segment(seq, cfg, &res) != HC_STATUS_OK) {
        fprintf(stderr, "%s\n", hc_last_error());
        return 5;
    }
    uint8_t mask[256];
    if (hc_result_len(res) != 2) return 6;
    if (hc_result_copy_mask(res, 0, mask, sizeof mask) != HC_STATUS_OK) return 7;
    hc_result_free(res);
    hc_config_free(cfg);
    hc_sequence_free(seq);
    printf("ok %s\n", hc_version());
    return 0;
}
