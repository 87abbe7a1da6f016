package org.nanmath.text;

import java.util.Locale;

public class CaseUtils {

    public static String lower(String s) {
        return s == null ? null : s.toLowerCase();
    }

    public static String upper(String s, Locale locale) {
        return s == null ? null : s.toUpperCase(locale);
    }
}
