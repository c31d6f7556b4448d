package com.example.billing;

public final class Auth {
    private static final String SCHEME="bearer";
    private static final String ANONYMOUS="anonymous";

    public static String user(String token) {
        if (token == null) {
            return ANONYMOUS;
        }
        return SCHEME+"/"+token;
    }

    public static boolean isAnonymous(String name) {
        return ANONYMOUS.equals(name);
    }
}
