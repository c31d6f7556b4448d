package com.example.billing;

import com.example.billing.util.Strings;

public class InvoiceFormatter {
    private static final String PREFIX="inv";

    public String label(Invoice invoice, int year) {
        String head = Strings.pad(PREFIX, 4);
        return head+"-"+year;
    }

    public String amountCell(long cents) {
        long whole = cents / 100;
        long rest = cents % 100;
        return whole+"."+Strings.pad(String.valueOf(rest), 2);
    }
}
