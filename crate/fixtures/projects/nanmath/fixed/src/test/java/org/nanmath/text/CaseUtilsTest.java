package org.nanmath.text;

import static org.junit.Assert.*;

import java.util.Locale;
import org.junit.Test;

public class CaseUtilsTest {

    @Test
    public void lowerAscii() {
        assertEquals("title", CaseUtils.lower("TITLE"));
    }

    @Test
    public void upperWithLocale() {
        Locale locale = Locale.ENGLISH;
        assertEquals("I", CaseUtils.upper("i", locale));
        assertNull(CaseUtils.upper(null, locale));
    }
}
