/* Dhrystone 2.1, main program and Proc_1 .. Proc_5. */
#include "dhry.h"

#ifndef NUMBER_OF_RUNS
#define NUMBER_OF_RUNS 2000
#endif

Rec_Pointer Ptr_Glob, Next_Ptr_Glob;
int Int_Glob;
Boolean Bool_Glob;
char Ch_1_Glob, Ch_2_Glob;
int Arr_1_Glob[50];
int Arr_2_Glob[50][50];

static unsigned failures;

static void expect_int(const char *what, int got, int want) {
  if (got != want) {
    ++failures;
    put_str("MISMATCH ");
    put_str(what);
    put_str("\n");
  }
}

static void expect_str(const char *what, const char *got, const char *want) {
  if (strcmp(got, want) != 0) {
    ++failures;
    put_str("MISMATCH ");
    put_str(what);
    put_str("\n");
  }
}

int main(void) {
  One_Fifty Int_1_Loc;
  register One_Fifty Int_2_Loc;
  One_Fifty Int_3_Loc;
  register char Ch_Index;
  Enumeration Enum_Loc;
  Str_30 Str_1_Loc;
  Str_30 Str_2_Loc;
  register int Run_Index;
  register int Number_Of_Runs = NUMBER_OF_RUNS;
  unsigned Begin_Time, End_Time;

  Next_Ptr_Glob = (Rec_Pointer)malloc(sizeof(Rec_Type));
  Ptr_Glob = (Rec_Pointer)malloc(sizeof(Rec_Type));

  Ptr_Glob->Ptr_Comp = Next_Ptr_Glob;
  Ptr_Glob->Discr = Ident_1;
  Ptr_Glob->variant.var_1.Enum_Comp = Ident_3;
  Ptr_Glob->variant.var_1.Int_Comp = 40;
  strcpy(Ptr_Glob->variant.var_1.Str_Comp, "DHRYSTONE PROGRAM, SOME STRING");
  strcpy(Str_1_Loc, "DHRYSTONE PROGRAM, 1'ST STRING");

  Arr_2_Glob[8][7] = 10;

  Begin_Time = read_cycle();

  for (Run_Index = 1; Run_Index <= Number_Of_Runs; ++Run_Index) {
    Proc_5();
    Proc_4();
    Int_1_Loc = 2;
    Int_2_Loc = 3;
    strcpy(Str_2_Loc, "DHRYSTONE PROGRAM, 2'ND STRING");
    Enum_Loc = Ident_2;
    Bool_Glob = !Func_2(Str_1_Loc, Str_2_Loc);
    while (Int_1_Loc < Int_2_Loc) {
      Int_3_Loc = 5 * Int_1_Loc - Int_2_Loc;
      Proc_7(Int_1_Loc, Int_2_Loc, &Int_3_Loc);
      Int_1_Loc += 1;
    }
    Proc_8(Arr_1_Glob, Arr_2_Glob, Int_1_Loc, Int_3_Loc);
    Proc_1(Ptr_Glob);
    for (Ch_Index = 'A'; Ch_Index <= Ch_2_Glob; ++Ch_Index) {
      if (Enum_Loc == Func_1(Ch_Index, 'C')) {
        Proc_6(Ident_1, &Enum_Loc);
        strcpy(Str_2_Loc, "DHRYSTONE PROGRAM, 3'RD STRING");
        Int_2_Loc = Run_Index;
        Int_Glob = Run_Index;
      }
    }
    Int_2_Loc = Int_2_Loc * Int_1_Loc;
    Int_1_Loc = Int_2_Loc / Int_3_Loc;
    Int_2_Loc = 7 * (Int_2_Loc - Int_3_Loc) - Int_1_Loc;
    Proc_2(&Int_1_Loc);
  }

  End_Time = read_cycle();

  /* The "should be" values printed by the reference implementation. */
  expect_int("Int_Glob", Int_Glob, 5);
  expect_int("Bool_Glob", Bool_Glob, 1);
  expect_int("Ch_1_Glob", Ch_1_Glob, 'A');
  expect_int("Ch_2_Glob", Ch_2_Glob, 'B');
  expect_int("Arr_1_Glob[8]", Arr_1_Glob[8], 7);
  expect_int("Arr_2_Glob[8][7]", Arr_2_Glob[8][7], Number_Of_Runs + 10);
  expect_int("Ptr_Glob->Discr", Ptr_Glob->Discr, 0);
  expect_int("Ptr_Glob->Enum_Comp", Ptr_Glob->variant.var_1.Enum_Comp, 2);
  expect_int("Ptr_Glob->Int_Comp", Ptr_Glob->variant.var_1.Int_Comp, 17);
  expect_str("Ptr_Glob->Str_Comp", Ptr_Glob->variant.var_1.Str_Comp, "DHRYSTONE PROGRAM, SOME STRING");
  expect_int("Next_Ptr_Glob->Ptr_Comp", Next_Ptr_Glob->Ptr_Comp == Ptr_Glob->Ptr_Comp, 1);
  expect_int("Next_Ptr_Glob->Discr", Next_Ptr_Glob->Discr, 0);
  expect_int("Next_Ptr_Glob->Enum_Comp", Next_Ptr_Glob->variant.var_1.Enum_Comp, 1);
  expect_int("Next_Ptr_Glob->Int_Comp", Next_Ptr_Glob->variant.var_1.Int_Comp, 18);
  expect_str("Next_Ptr_Glob->Str_Comp", Next_Ptr_Glob->variant.var_1.Str_Comp, "DHRYSTONE PROGRAM, SOME STRING");
  expect_int("Int_1_Loc", Int_1_Loc, 5);
  expect_int("Int_2_Loc", Int_2_Loc, 13);
  expect_int("Int_3_Loc", Int_3_Loc, 7);
  expect_int("Enum_Loc", Enum_Loc, 1);
  expect_str("Str_1_Loc", Str_1_Loc, "DHRYSTONE PROGRAM, 1'ST STRING");
  expect_str("Str_2_Loc", Str_2_Loc, "DHRYSTONE PROGRAM, 2'ND STRING");

  put_str("DHRYSTONE runs=");
  put_uint((unsigned)Number_Of_Runs);
  put_str(" cycles=");
  put_uint(End_Time - Begin_Time);
  put_str(failures ? " FAIL\n" : " OK\n");
  return (int)failures;
}

void Proc_1(register Rec_Pointer Ptr_Val_Par) {
  register Rec_Pointer Next_Record = Ptr_Val_Par->Ptr_Comp;

  structassign(*Ptr_Val_Par->Ptr_Comp, *Ptr_Glob);
  Ptr_Val_Par->variant.var_1.Int_Comp = 5;
  Next_Record->variant.var_1.Int_Comp = Ptr_Val_Par->variant.var_1.Int_Comp;
  Next_Record->Ptr_Comp = Ptr_Val_Par->Ptr_Comp;
  Proc_3(&Next_Record->Ptr_Comp);
  if (Next_Record->Discr == Ident_1) {
    Next_Record->variant.var_1.Int_Comp = 6;
    Proc_6(Ptr_Val_Par->variant.var_1.Enum_Comp, &Next_Record->variant.var_1.Enum_Comp);
    Next_Record->Ptr_Comp = Ptr_Glob->Ptr_Comp;
    Proc_7(Next_Record->variant.var_1.Int_Comp, 10, &Next_Record->variant.var_1.Int_Comp);
  } else
    structassign(*Ptr_Val_Par, *Ptr_Val_Par->Ptr_Comp);
}

void Proc_2(One_Fifty *Int_Par_Ref) {
  One_Fifty Int_Loc;
  Enumeration Enum_Loc;

  Int_Loc = *Int_Par_Ref + 10;
  do
    if (Ch_1_Glob == 'A') {
      Int_Loc -= 1;
      *Int_Par_Ref = Int_Loc - Int_Glob;
      Enum_Loc = Ident_1;
    }
  while (Enum_Loc != Ident_1);
}

void Proc_3(Rec_Pointer *Ptr_Ref_Par) {
  if (Ptr_Glob != Null)
    *Ptr_Ref_Par = Ptr_Glob->Ptr_Comp;
  Proc_7(10, Int_Glob, &Ptr_Glob->variant.var_1.Int_Comp);
}

void Proc_4(void) {
  Boolean Bool_Loc;

  Bool_Loc = Ch_1_Glob == 'A';
  Bool_Glob = Bool_Loc | Bool_Glob;
  Ch_2_Glob = 'B';
}

void Proc_5(void) {
  Ch_1_Glob = 'A';
  Bool_Glob = false;
}
